#pragma once

#include "gradiometry/chain_dynamics.hpp"
#include "gradiometry/correlators.hpp"
#include "gradiometry/ensemble.hpp"
#include "gradiometry/errors.hpp"
#include "gradiometry/moment_curve.hpp"
#include "gradiometry/noise.hpp"
#include "gradiometry/oracle.hpp"
#include "gradiometry/profile.hpp"
#include "gradiometry/profile_dynamics.hpp"
#include "gradiometry/spinj.hpp"
#include "gradiometry/summation.hpp"
#include "gradiometry/version.hpp"
