// Umbrella header.

#pragma once

#include "dfx/calculus.hpp"
#include "dfx/criterion.hpp"
#include "dfx/domains.hpp"
#include "dfx/exponents.hpp"
#include "dfx/psh.hpp"
#include "dfx/riccati.hpp"
#include "dfx/types.hpp"
#include "dfx/weight.hpp"
