#ifndef DLIVM_DLIVM_HPP
#define DLIVM_DLIVM_HPP

#include "dlivm/errors.hpp"
#include "dlivm/eval.hpp"
#include "dlivm/harness.hpp"
#include "dlivm/maintain.hpp"
#include "dlivm/model.hpp"
#include "dlivm/parser.hpp"
#include "dlivm/program.hpp"
#include "dlivm/store.hpp"
#include "dlivm/stratify.hpp"
#include "dlivm/vocabulary.hpp"

#endif
