#pragma once

#include "ldl/comprehension.hpp"
#include "ldl/cues.hpp"
#include "ldl/error.hpp"
#include "ldl/experiments.hpp"
#include "ldl/io.hpp"
#include "ldl/lexicon.hpp"
#include "ldl/linalg.hpp"
#include "ldl/mappings.hpp"
#include "ldl/production.hpp"
#include "ldl/random.hpp"
#include "ldl/semantics.hpp"
#include "ldl/stats.hpp"
#include "ldl/synthetic.hpp"
