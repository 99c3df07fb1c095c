#pragma once

#include "cdlmg/ansatz.hpp"
#include "cdlmg/band_operators.hpp"
#include "cdlmg/banded_ansatz.hpp"
#include "cdlmg/counterdiabatic.hpp"
#include "cdlmg/dynamics.hpp"
#include "cdlmg/error.hpp"
#include "cdlmg/figures.hpp"
#include "cdlmg/io.hpp"
#include "cdlmg/nelder_mead.hpp"
#include "cdlmg/parallel.hpp"
#include "cdlmg/propagator.hpp"
#include "cdlmg/ramp.hpp"
#include "cdlmg/spectrum.hpp"
#include "cdlmg/spin_algebra.hpp"
