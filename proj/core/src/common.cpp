// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "thzsim/common.hpp"

#include <cstdio>
#include <exception>
#include <thread>
#include <vector>

namespace thzsim {

void for_each_index(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (count == 0)
    return;
  if (jobs <= 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i)
      fn(i);
    return;
  }
  const unsigned workers = std::min<unsigned>(jobs, static_cast<unsigned>(count));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < count; i += workers)
          fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool)
    t.join();
  for (const auto& e : errors)
    if (e)
      std::rethrow_exception(e);
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

} // namespace thzsim
