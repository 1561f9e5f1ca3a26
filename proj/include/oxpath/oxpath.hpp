#pragma once

#include "oxpath/ast.hpp"
#include "oxpath/browser.hpp"
#include "oxpath/dom.hpp"
#include "oxpath/engine.hpp"
#include "oxpath/error.hpp"
#include "oxpath/output_tree.hpp"
#include "oxpath/parser.hpp"
#include "oxpath/serializers.hpp"
#include "oxpath/text.hpp"
#include "oxpath/url.hpp"
#include "oxpath/value.hpp"
#include "oxpath/visibility.hpp"
#include "oxpath/xpath_eval.hpp"
