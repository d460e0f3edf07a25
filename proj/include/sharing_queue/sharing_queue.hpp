#pragma once

#include "errors.hpp"
#include "dist.hpp"
#include "embedded.hpp"
#include "limiting.hpp"
#include "cost.hpp"
#include "sim.hpp"
#include "config.hpp"
#include "commands.hpp"
