#pragma once

#include "blockalt/baselines.hpp"
#include "blockalt/control.hpp"
#include "blockalt/expr.hpp"
#include "blockalt/io.hpp"
#include "blockalt/multistart.hpp"
#include "blockalt/problem.hpp"
#include "blockalt/rng.hpp"
#include "blockalt/sampling.hpp"
#include "blockalt/scalar.hpp"
#include "blockalt/solver.hpp"
