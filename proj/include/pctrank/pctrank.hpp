#pragma once

// Umbrella header for the percentile-rank citation impact toolkit.

#include "pctrank/indicators.hpp"
#include "pctrank/io.hpp"
#include "pctrank/percentile.hpp"
#include "pctrank/report.hpp"
#include "pctrank/schemes.hpp"
#include "pctrank/stats.hpp"
#include "pctrank/types.hpp"
