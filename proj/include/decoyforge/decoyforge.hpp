#pragma once

#include "architecture.hpp"
#include "catalog.hpp"
#include "constraint.hpp"
#include "core.hpp"
#include "emit.hpp"
#include "enumerate.hpp"
#include "json_io.hpp"
#include "refine.hpp"
#include "scenario.hpp"
#include "scenario_io.hpp"
#include "secrets.hpp"
#include "taxonomy.hpp"
#include "version.hpp"
