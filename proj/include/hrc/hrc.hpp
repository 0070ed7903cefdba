#pragma once

#include "hrc/algorithms.hpp"
#include "hrc/harness.hpp"
#include "hrc/hiertree.hpp"
#include "hrc/metricspace.hpp"
#include "hrc/objectives.hpp"
#include "hrc/rng.hpp"
#include "hrc/ultrametric.hpp"
