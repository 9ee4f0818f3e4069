#ifndef UGPUCB_UGPUCB_HPP
#define UGPUCB_UGPUCB_HPP

#include "common.hpp"
#include "kernels.hpp"
#include "gp.hpp"
#include "optimize.hpp"
#include "objectives.hpp"
#include "noise.hpp"
#include "acquisition.hpp"
#include "harness.hpp"
#include "config.hpp"
#include "io.hpp"
#include "theory_check.hpp"

#endif  // UGPUCB_UGPUCB_HPP
