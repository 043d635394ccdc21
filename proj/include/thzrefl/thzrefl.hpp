#pragma once

#include "thzrefl/data.hpp"
#include "thzrefl/dataset.hpp"
#include "thzrefl/error.hpp"
#include "thzrefl/evalcmp.hpp"
#include "thzrefl/io.hpp"
#include "thzrefl/lm.hpp"
#include "thzrefl/models.hpp"
#include "thzrefl/physics.hpp"
#include "thzrefl/rng.hpp"
#include "thzrefl/specfun.hpp"
#include "thzrefl/wftrend.hpp"
