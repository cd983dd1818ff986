#pragma once

#include <gtest/gtest.h>

#include "sadq/common/error.hpp"

#define EXPECT_SADQ_ERROR(statement, expected_kind)                                              \
  do {                                                                                          \
    try {                                                                                       \
      statement;                                                                                \
      ADD_FAILURE() << "expected " << ::sadq::to_string(expected_kind) << ", nothing thrown";   \
    } catch (const ::sadq::Error& e) {                                                          \
      EXPECT_EQ(e.kind(), expected_kind) << e.what();                                           \
    }                                                                                           \
  } while (0)
