#pragma once

#include "mll/coding.hpp"
#include "mll/errors.hpp"
#include "mll/fit.hpp"
#include "mll/identities.hpp"
#include "mll/io.hpp"
#include "mll/loglinear.hpp"
#include "mll/marginal.hpp"
#include "mll/mediation.hpp"
#include "mll/mixed.hpp"
#include "mll/random.hpp"
#include "mll/roles.hpp"
#include "mll/tables.hpp"
#include "mll/verify.hpp"
