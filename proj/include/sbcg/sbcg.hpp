#pragma once

#include "sbcg/constrained_lmo.hpp"
#include "sbcg/cut.hpp"
#include "sbcg/errors.hpp"
#include "sbcg/estimators.hpp"
#include "sbcg/feasible_set.hpp"
#include "sbcg/io.hpp"
#include "sbcg/lp.hpp"
#include "sbcg/oracle.hpp"
#include "sbcg/problem.hpp"
#include "sbcg/problems/dictionary.hpp"
#include "sbcg/problems/least_squares.hpp"
#include "sbcg/problems/regression.hpp"
#include "sbcg/problems/toy.hpp"
#include "sbcg/reference.hpp"
#include "sbcg/solvers.hpp"
#include "sbcg/types.hpp"
