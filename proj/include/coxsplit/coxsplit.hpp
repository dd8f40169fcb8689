#pragma once

#include "coxsplit/boxplot.hpp"
#include "coxsplit/calibration.hpp"
#include "coxsplit/errors.hpp"
#include "coxsplit/experiment.hpp"
#include "coxsplit/io.hpp"
#include "coxsplit/numeric.hpp"
#include "coxsplit/power.hpp"
#include "coxsplit/rng.hpp"
#include "coxsplit/simulation.hpp"
