#pragma once

// Convenience umbrella: the whole pipeline in one include.

#include "symline/corpus.hpp"
#include "symline/problem.hpp"
