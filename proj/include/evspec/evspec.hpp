#pragma once

#include "evspec/assignment.hpp"
#include "evspec/core.hpp"
#include "evspec/discount.hpp"
#include "evspec/errors.hpp"
#include "evspec/metaconflict.hpp"
#include "evspec/pipeline.hpp"
#include "evspec/specify.hpp"
