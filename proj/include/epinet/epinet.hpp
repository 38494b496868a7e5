#pragma once

#include "analyze.hpp"
#include "artifacts.hpp"
#include "calibrate.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "generators.hpp"
#include "interventions.hpp"
#include "measures.hpp"
#include "model.hpp"
#include "network.hpp"
#include "network_io.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "temporal.hpp"
