#pragma once

#include "proxsdca/error.hpp"
#include "proxsdca/l1.hpp"
#include "proxsdca/loss.hpp"
#include "proxsdca/norms.hpp"
#include "proxsdca/problem.hpp"
#include "proxsdca/random.hpp"
#include "proxsdca/regularizer.hpp"
#include "proxsdca/schedule.hpp"
#include "proxsdca/solver.hpp"
#include "proxsdca/sparse.hpp"
#include "proxsdca/structured.hpp"
