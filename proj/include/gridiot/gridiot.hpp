#pragma once

#include "gridiot/config.hpp"
#include "gridiot/config_io.hpp"
#include "gridiot/csv.hpp"
#include "gridiot/errors.hpp"
#include "gridiot/geometry.hpp"
#include "gridiot/montecarlo.hpp"
#include "gridiot/queueing.hpp"
#include "gridiot/ratedesign.hpp"
#include "gridiot/sinr_analysis.hpp"
#include "gridiot/special.hpp"
