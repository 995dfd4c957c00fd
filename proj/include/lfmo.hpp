#pragma once

#include "lfmo/error.hpp"
#include "lfmo/failure_times.hpp"
#include "lfmo/fraction_law.hpp"
#include "lfmo/numeric.hpp"
#include "lfmo/random.hpp"
#include "lfmo/reliability.hpp"
#include "lfmo/signature.hpp"
#include "lfmo/stats.hpp"
#include "lfmo/subordinator.hpp"
