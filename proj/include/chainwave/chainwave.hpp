#pragma once

#include "chainwave/model.hpp"
#include "chainwave/evolve.hpp"
#include "chainwave/fidelity.hpp"
#include "chainwave/parallel.hpp"
#include "chainwave/stochastic.hpp"
#include "chainwave/sweep.hpp"
#include "chainwave/oracle.hpp"
#include "chainwave/io.hpp"
