#pragma once

#include "busemann.hpp"
#include "experiments.hpp"
#include "fluctuations.hpp"
#include "fluid.hpp"
#include "lpp.hpp"
#include "parallel.hpp"
#include "particles.hpp"
#include "points.hpp"
#include "rng.hpp"
#include "stats.hpp"
