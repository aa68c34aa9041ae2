#pragma once

#include "diffphy/comms/channel.hpp"
#include "diffphy/comms/constellation.hpp"
#include "diffphy/comms/metrics.hpp"
#include "diffphy/diffusion/model.hpp"
#include "diffphy/diffusion/schedule.hpp"
#include "diffphy/errors.hpp"
#include "diffphy/io/checkpoint.hpp"
#include "diffphy/io/config.hpp"
#include "diffphy/io/result_table.hpp"
#include "diffphy/io/svg_plot.hpp"
#include "diffphy/nn/adam.hpp"
#include "diffphy/nn/mlp.hpp"
#include "diffphy/nn/time_embedding.hpp"
#include "diffphy/pipelines/baseline.hpp"
#include "diffphy/pipelines/receiver.hpp"
#include "diffphy/pipelines/shaping.hpp"
#include "diffphy/version.hpp"
