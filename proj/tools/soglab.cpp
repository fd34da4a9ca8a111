#include "sog/cli.hpp"

int main(int argc, char** argv) { return sog::run(argc, argv); }
