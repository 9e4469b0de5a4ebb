#pragma once

#include "agent.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "experiment.hpp"
#include "free_energy.hpp"
#include "gridworld.hpp"
#include "hamiltonian.hpp"
#include "network.hpp"
#include "oracle.hpp"
#include "replay.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "stats.hpp"
#include "summarize.hpp"
