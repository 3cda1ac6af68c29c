#pragma once

#include "monolev/config.hpp"
#include "monolev/convolution.hpp"
#include "monolev/errata.hpp"
#include "monolev/errors.hpp"
#include "monolev/flow.hpp"
#include "monolev/io.hpp"
#include "monolev/markov.hpp"
#include "monolev/matrix_oracle.hpp"
#include "monolev/measure.hpp"
#include "monolev/semigroup.hpp"
#include "monolev/transform.hpp"
#include "monolev/verify.hpp"
