#pragma once

#include "mgfbm/errors.hpp"
#include "mgfbm/grid.hpp"
#include "mgfbm/io.hpp"
#include "mgfbm/kernel.hpp"
#include "mgfbm/numeric.hpp"
#include "mgfbm/params.hpp"
#include "mgfbm/rng.hpp"
#include "mgfbm/sampler.hpp"
#include "mgfbm/verify.hpp"
