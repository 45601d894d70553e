#pragma once

#include "qwalk/coin_field.hpp"
#include "qwalk/error.hpp"
#include "qwalk/evolve.hpp"
#include "qwalk/harness.hpp"
#include "qwalk/observables.hpp"
#include "qwalk/rg_flow.hpp"
#include "qwalk/version.hpp"
#include "qwalk/walker.hpp"
