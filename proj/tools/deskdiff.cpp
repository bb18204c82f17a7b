// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>
#include <vector>

#include "deskdiff/cli.hpp"

int main(int argc, char** argv) {
    return deskdiff::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
