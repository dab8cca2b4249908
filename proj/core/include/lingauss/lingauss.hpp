#pragma once

#include "lingauss/constraints.hpp"
#include "lingauss/derivatives.hpp"
#include "lingauss/errors.hpp"
#include "lingauss/hdr.hpp"
#include "lingauss/liness.hpp"
#include "lingauss/nestings.hpp"
#include "lingauss/problem_io.hpp"
#include "lingauss/rng.hpp"
#include "lingauss/version.hpp"
