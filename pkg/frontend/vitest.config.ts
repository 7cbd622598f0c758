import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
    testTimeout: 30000,
    hookTimeout: 30000,
    // the e2e suite spawns one service per test; keep files sequential
    fileParallelism: false,
  },
});
