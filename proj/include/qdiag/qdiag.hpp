#pragma once

#include "qdiag/errors.hpp"
#include "qdiag/estimator.hpp"
#include "qdiag/experiment.hpp"
#include "qdiag/gaussian.hpp"
#include "qdiag/matrix.hpp"
#include "qdiag/matrix_market.hpp"
#include "qdiag/mc_oracle.hpp"
#include "qdiag/oracle.hpp"
#include "qdiag/theory.hpp"
