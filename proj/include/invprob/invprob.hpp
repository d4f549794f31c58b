// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "invprob/basis.hpp"
#include "invprob/coefficients.hpp"
#include "invprob/config.hpp"
#include "invprob/ellipsoid.hpp"
#include "invprob/errors.hpp"
#include "invprob/estimators.hpp"
#include "invprob/experiment.hpp"
#include "invprob/io.hpp"
#include "invprob/models.hpp"
#include "invprob/multi_index.hpp"
#include "invprob/net.hpp"
#include "invprob/operators.hpp"
#include "invprob/packing.hpp"
#include "invprob/parallel.hpp"
#include "invprob/risk.hpp"
