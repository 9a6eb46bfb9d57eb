#pragma once

#include <doctest.h>

#include "spl/error.hpp"

// Asserts that `expr` throws spl::Error with the given code.
#define CHECK_THROWS_CODE(expr, errc)                        \
  do {                                                       \
    bool thrown_ = false;                                    \
    try {                                                    \
      (void)(expr);                                          \
    } catch (const spl::Error& e_) {                         \
      thrown_ = true;                                        \
      CHECK_MESSAGE(e_.code() == (errc), e_.what());         \
    }                                                        \
    CHECK_MESSAGE(thrown_, "expected spl::Error: " #expr);   \
  } while (false)
