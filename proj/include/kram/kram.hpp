#pragma once

#include "kram/approximate.hpp"
#include "kram/constructions.hpp"
#include "kram/errors.hpp"
#include "kram/expr.hpp"
#include "kram/identities.hpp"
#include "kram/io.hpp"
#include "kram/network.hpp"
#include "kram/polynomial.hpp"
#include "kram/rational.hpp"
#include "kram/weighted.hpp"
