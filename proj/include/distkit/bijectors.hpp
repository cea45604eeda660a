#pragma once

#include "distkit/bijector.hpp"
#include "distkit/bijectors/affine.hpp"
#include "distkit/bijectors/chain.hpp"
#include "distkit/bijectors/elementwise.hpp"
#include "distkit/bijectors/masked_autoregressive.hpp"
#include "distkit/bijectors/structural.hpp"
