#pragma once

#include "zzsim/kernel.hpp"
#include "zzsim/rng.hpp"
#include "zzsim/loss_models.hpp"
#include "zzsim/rott.hpp"
#include "zzsim/classifier.hpp"
#include "zzsim/controller.hpp"
#include "zzsim/scenario.hpp"
#include "zzsim/network.hpp"
#include "zzsim/metrics.hpp"
#include "zzsim/report.hpp"
#include "zzsim/experiments.hpp"
