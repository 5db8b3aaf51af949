#pragma once

#include "wpadapt/brownian.hpp"
#include "wpadapt/constants.hpp"
#include "wpadapt/errors.hpp"
#include "wpadapt/harness.hpp"
#include "wpadapt/parallel.hpp"
#include "wpadapt/polynomial.hpp"
#include "wpadapt/problem.hpp"
#include "wpadapt/quadrature.hpp"
#include "wpadapt/rng.hpp"
#include "wpadapt/schemes.hpp"
#include "wpadapt/version.hpp"
