import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
    // the round-trip suite boots the python gateway, which takes a few seconds
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
