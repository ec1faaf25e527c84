#pragma once

#include <bcd/errors.hpp>
#include <bcd/linalg.hpp>
#include <bcd/objectives.hpp>
#include <bcd/prox.hpp>
#include <bcd/selection.hpp>
#include <bcd/rates.hpp>
#include <bcd/descent.hpp>
#include <bcd/instance_io.hpp>
#include <bcd/harness.hpp>
#include <bcd/checks.hpp>
