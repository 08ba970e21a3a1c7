#ifndef MPIRK_MPIRK_HPP
#define MPIRK_MPIRK_HPP

#include "mpirk/errors.hpp"
#include "mpirk/real.hpp"
#include "mpirk/linalg.hpp"
#include "mpirk/tableau.hpp"
#include "mpirk/stability.hpp"
#include "mpirk/krylov.hpp"
#include "mpirk/refine.hpp"
#include "mpirk/reduced.hpp"
#include "mpirk/newton.hpp"
#include "mpirk/problems.hpp"
#include "mpirk/integrate.hpp"

#endif  // MPIRK_MPIRK_HPP
