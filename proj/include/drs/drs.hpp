// Umbrella header.
#pragma once

#include "drs/core.hpp"
#include "drs/likelihood.hpp"
#include "drs/stats.hpp"
#include "drs/random.hpp"
#include "drs/estimators.hpp"
#include "drs/bootstrap.hpp"
#include "drs/sim.hpp"
#include "drs/io.hpp"
#include "drs/reproduce.hpp"
