#pragma once

#include "revpref/agent_oracle.hpp"
#include "revpref/all_pairs_learner.hpp"
#include "revpref/core_types.hpp"
#include "revpref/harness.hpp"
#include "revpref/polytope_learner.hpp"
#include "revpref/ratio_bounds.hpp"
#include "revpref/separable_learner.hpp"
