#pragma once

#include "lsvqc/error.hpp"
#include "lsvqc/pauli.hpp"
#include "lsvqc/state.hpp"
#include "lsvqc/dense.hpp"
#include "lsvqc/model.hpp"
#include "lsvqc/circuit.hpp"
#include "lsvqc/subspace.hpp"
#include "lsvqc/optimize.hpp"
#include "lsvqc/compile.hpp"
#include "lsvqc/observables.hpp"
#include "lsvqc/resource.hpp"
