#pragma once

#include "ccm/geometry.hpp"
#include "ccm/fft.hpp"
#include "ccm/spectral.hpp"
#include "ccm/states.hpp"
#include "ccm/state_io.hpp"
#include "ccm/realop.hpp"
#include "ccm/lax.hpp"
#include "ccm/symplectic.hpp"
#include "ccm/flows.hpp"
#include "ccm/verify.hpp"
