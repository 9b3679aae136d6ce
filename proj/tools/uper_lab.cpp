#include "uper/runner.hpp"

int main(int argc, char** argv) { return uper::cli_main(argc, argv); }
