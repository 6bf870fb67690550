#pragma once

#include "errors.hpp"
#include "assets.hpp"
#include "flexibility.hpp"
#include "dispatch.hpp"
#include "soc_guard.hpp"
#include "market.hpp"
#include "oracle.hpp"
#include "kvdoc.hpp"
#include "data_io.hpp"
#include "config.hpp"
#include "experiments.hpp"
