#pragma once

#include "qwalk/errors.hpp"
#include "qwalk/random.hpp"
#include "qwalk/spinor.hpp"
#include "qwalk/walk.hpp"
#include "qwalk/decoherence.hpp"
#include "qwalk/ensemble.hpp"
#include "qwalk/observables.hpp"
#include "qwalk/transition.hpp"
#include "qwalk/cli_io.hpp"
