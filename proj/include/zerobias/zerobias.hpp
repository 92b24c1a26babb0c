#pragma once

#include "zerobias/audit.hpp"
#include "zerobias/bench.hpp"
#include "zerobias/core.hpp"
#include "zerobias/density.hpp"
#include "zerobias/engine.hpp"
#include "zerobias/io.hpp"
#include "zerobias/rng.hpp"
#include "zerobias/stages.hpp"
#include "zerobias/taps.hpp"
