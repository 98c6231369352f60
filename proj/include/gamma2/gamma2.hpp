#pragma once

#include "gamma2/asymptotics.hpp"
#include "gamma2/error.hpp"
#include "gamma2/io.hpp"
#include "gamma2/isoperimetry.hpp"
#include "gamma2/potential.hpp"
#include "gamma2/profile.hpp"
#include "gamma2/rearrangement.hpp"
#include "gamma2/solver1d.hpp"
#include "gamma2/weight.hpp"
