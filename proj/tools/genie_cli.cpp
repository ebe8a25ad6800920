#include <cstdio>

int main() {
  std::puts("genie cli placeholder");
  return 0;
}
