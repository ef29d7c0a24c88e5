// SPDX-License-Identifier: Apache-2.0
#include "wgcd/cli.hpp"

int main(int argc, char** argv) { return wgcd::cli_main(argc, argv); }
