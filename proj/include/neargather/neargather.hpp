#pragma once

#include "neargather/geometry.hpp"
#include "neargather/protocol.hpp"
#include "neargather/trace.hpp"
#include "neargather/simulator.hpp"
#include "neargather/analysis.hpp"
#include "neargather/scenarios.hpp"
#include "neargather/cli.hpp"
