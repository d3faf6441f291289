#pragma once

#include "contention.hpp"
#include "csv.hpp"
#include "energy.hpp"
#include "error.hpp"
#include "mac.hpp"
#include "model.hpp"
#include "network.hpp"
#include "numeric.hpp"
#include "optimize.hpp"
#include "ratechan.hpp"
#include "simulator.hpp"
#include "throughput.hpp"
