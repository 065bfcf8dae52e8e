#pragma once

#include "specshare/channel.hpp"
#include "specshare/config.hpp"
#include "specshare/desirability.hpp"
#include "specshare/enumerate.hpp"
#include "specshare/errors.hpp"
#include "specshare/harness.hpp"
#include "specshare/learning.hpp"
#include "specshare/matching.hpp"
#include "specshare/random.hpp"
#include "specshare/rates.hpp"
#include "specshare/solvers.hpp"
