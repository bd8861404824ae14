#pragma once

#include "whg/complex_matrix.hpp"
#include "whg/errors.hpp"
#include "whg/experiment.hpp"
#include "whg/field.hpp"
#include "whg/group.hpp"
#include "whg/linalg.hpp"
#include "whg/oracle.hpp"
#include "whg/qft_circuit.hpp"
#include "whg/rational.hpp"
#include "whg/recovery.hpp"
#include "whg/reps.hpp"
#include "whg/rng.hpp"
#include "whg/simulator.hpp"
#include "whg/structured_state.hpp"
#include "whg/subgroup.hpp"
