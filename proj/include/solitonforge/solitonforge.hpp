#pragma once

#include "dressing.hpp"
#include "errors.hpp"
#include "griddump.hpp"
#include "laxflow.hpp"
#include "matcore.hpp"
#include "sl2r_blowup.hpp"
#include "spectral.hpp"
#include "symspace.hpp"
#include "wavemaps.hpp"
