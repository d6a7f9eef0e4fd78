#pragma once

#include <azvd/decimal.hpp>
#include <azvd/default_registry.hpp>
#include <azvd/document.hpp>
#include <azvd/evaluate.hpp>
#include <azvd/expression.hpp>
#include <azvd/layout.hpp>
#include <azvd/parser.hpp>
#include <azvd/pattern.hpp>
#include <azvd/registry.hpp>
#include <azvd/score.hpp>
