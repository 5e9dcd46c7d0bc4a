#pragma once

#include "siegert/errors.hpp"
#include "siegert/model.hpp"
#include "siegert/siegert_solver.hpp"
#include "siegert/quadrature.hpp"
#include "siegert/wavefunc.hpp"
#include "siegert/flux_identities.hpp"
#include "siegert/expanding_domain.hpp"
#include "siegert/tdse.hpp"
#include "siegert/deep_well.hpp"
