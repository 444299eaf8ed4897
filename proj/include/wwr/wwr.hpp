#pragma once

#include "wwr/affine.hpp"
#include "wwr/engine.hpp"
#include "wwr/exposure.hpp"
#include "wwr/mc.hpp"
#include "wwr/normal.hpp"
#include "wwr/rng.hpp"
#include "wwr/termstructure.hpp"
#include "wwr/wwm.hpp"
