#pragma once

#include "fsbl/criteria.hpp"
#include "fsbl/datagen.hpp"
#include "fsbl/errors.hpp"
#include "fsbl/io.hpp"
#include "fsbl/priors.hpp"
#include "fsbl/quadrature.hpp"
#include "fsbl/section.hpp"
#include "fsbl/solver.hpp"
