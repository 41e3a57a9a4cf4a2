#include <cstdio>

int main() {
    std::puts("fluidtree: CLI not wired yet");
    return 1;
}
