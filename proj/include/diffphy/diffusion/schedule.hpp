#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "diffphy/errors.hpp"

namespace diffphy::diffusion {

/// Per-step noise variances of the forward process and their cumulative
/// products. Steps are 1-based: beta_at(1) .. beta_at(T).
struct VarianceSchedule {
    int steps = 0;                  // T
    std::vector<double> beta;       // beta[t-1], in (0,1), non-decreasing
    std::vector<double> alpha;      // 1 - beta[t]
    std::vector<double> alpha_bar;  // prod_{s<=t} alpha[s], strictly decreasing

    void check_step(int t) const {
        if (t < 1 || t > steps)
            throw DomainError("schedule: step " + std::to_string(t) + " outside [1, " +
                              std::to_string(steps) + "]");
    }
    double beta_at(int t) const { check_step(t); return beta[t - 1]; }
    double alpha_at(int t) const { check_step(t); return alpha[t - 1]; }
    double alpha_bar_at(int t) const { check_step(t); return alpha_bar[t - 1]; }
    /// alpha_bar of the previous step, with the empty-product convention
    /// alpha_bar(0) = 1.
    double alpha_bar_before(int t) const { check_step(t); return t == 1 ? 1.0 : alpha_bar[t - 2]; }

    /// Reverse-process noise variance: sigma_t^2 = beta_tilde_t. Zero at t = 1.
    double posterior_variance(int t) const {
        check_step(t);
        if (t == 1) return 0.0;
        return (1.0 - alpha_bar_before(t)) / (1.0 - alpha_bar_at(t)) * beta_at(t);
    }

    /// Per-step SNR in dB: 10 log10(alpha_bar / (1 - alpha_bar)).
    double snr_db_at(int t) const {
        const double ab = alpha_bar_at(t);
        return 10.0 * std::log10(ab / (1.0 - ab));
    }

    void validate() const {
        if (steps < 2 || static_cast<int>(beta.size()) != steps ||
            static_cast<int>(alpha.size()) != steps || static_cast<int>(alpha_bar.size()) != steps)
            throw DomainError("schedule: inconsistent table sizes");
        for (int i = 0; i < steps; ++i) {
            if (!(beta[i] > 0.0 && beta[i] < 1.0))
                throw DomainError("schedule: beta outside (0,1) at step " + std::to_string(i + 1));
            if (i > 0 && beta[i] < beta[i - 1])
                throw DomainError("schedule: beta must be non-decreasing");
            if (i > 0 && !(alpha_bar[i] < alpha_bar[i - 1]))
                throw DomainError("schedule: alpha_bar must be strictly decreasing");
        }
        if (!(alpha_bar.back() < 0.5))
            throw DomainError("schedule: terminal alpha_bar " + std::to_string(alpha_bar.back()) +
                              " >= 0.5; terminal marginal is not close to isotropic noise");
    }
};

/// Linear beta ramp from beta_start to beta_end inclusive, over T steps.
inline VarianceSchedule linear_schedule(int steps, double beta_start, double beta_end) {
    if (steps < 2) throw DomainError("linear_schedule: need T >= 2");
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
        throw DomainError("linear_schedule: need 0 < beta_start <= beta_end < 1");

    VarianceSchedule sched;
    sched.steps = steps;
    sched.beta.resize(steps);
    sched.alpha.resize(steps);
    sched.alpha_bar.resize(steps);
    double running = 1.0;
    for (int i = 0; i < steps; ++i) {
        sched.beta[i] = beta_start + (beta_end - beta_start) * i / (steps - 1);
        sched.alpha[i] = 1.0 - sched.beta[i];
        running *= sched.alpha[i];
        sched.alpha_bar[i] = running;
    }
    sched.validate();
    return sched;
}

}  // namespace diffphy::diffusion
