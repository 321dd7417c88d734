#include "touchsig/cli.hpp"

int main(int argc, char** argv) { return touchsig::run(argc, argv); }
