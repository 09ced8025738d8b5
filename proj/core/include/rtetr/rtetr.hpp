#pragma once

#include "rtetr/control.hpp"
#include "rtetr/error.hpp"
#include "rtetr/evolution.hpp"
#include "rtetr/field_io.hpp"
#include "rtetr/krylov.hpp"
#include "rtetr/medium.hpp"
#include "rtetr/phase_grid.hpp"
#include "rtetr/stationary.hpp"
#include "rtetr/timereversal.hpp"
