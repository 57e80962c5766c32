import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the replay test boots the real service and waits for /v1/health
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
