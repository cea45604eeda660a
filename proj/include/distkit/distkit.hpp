#pragma once

// Umbrella header: the full distribution catalog, bijectors, combinators,
// divergence functionals, and the JSON model-spec front end.

#include "distkit/autoregressive.hpp"
#include "distkit/bijector.hpp"
#include "distkit/bijectors.hpp"
#include "distkit/distribution.hpp"
#include "distkit/distributions.hpp"
#include "distkit/errors.hpp"
#include "distkit/independent.hpp"
#include "distkit/kde.hpp"
#include "distkit/kl.hpp"
#include "distkit/mixture.hpp"
#include "distkit/model_spec.hpp"
#include "distkit/ndarray.hpp"
#include "distkit/random.hpp"
#include "distkit/shape.hpp"
#include "distkit/special.hpp"
#include "distkit/transformed.hpp"
