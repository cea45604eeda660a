#pragma once

#include "distkit/distributions/bernoulli.hpp"
#include "distkit/distributions/beta.hpp"
#include "distkit/distributions/categorical.hpp"
#include "distkit/distributions/cauchy.hpp"
#include "distkit/distributions/dirichlet.hpp"
#include "distkit/distributions/exponential.hpp"
#include "distkit/distributions/gamma.hpp"
#include "distkit/distributions/laplace.hpp"
#include "distkit/distributions/mvn.hpp"
#include "distkit/distributions/normal.hpp"
#include "distkit/distributions/poisson.hpp"
#include "distkit/distributions/student_t.hpp"
#include "distkit/distributions/uniform.hpp"
