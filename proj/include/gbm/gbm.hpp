#pragma once

// Umbrella header.

#include "gbm/analysis.hpp"
#include "gbm/fock.hpp"
#include "gbm/hamiltonian.hpp"
#include "gbm/io.hpp"
#include "gbm/linalg.hpp"
#include "gbm/symplectic.hpp"
#include "gbm/tensor.hpp"
#include "gbm/types.hpp"
