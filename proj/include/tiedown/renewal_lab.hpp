#pragma once

#include "tiedown/renewal/checks.hpp"
#include "tiedown/renewal/convolution.hpp"
#include "tiedown/renewal/lattice_law.hpp"
