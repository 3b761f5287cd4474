/// <reference types="vitest/config" />
import { defineConfig } from "vite";

export default defineConfig({
  base: "./",
  server: {
    proxy: {
      // dev convenience: same-origin API calls hit a locally running service
      "/api": "http://127.0.0.1:8421",
    },
  },
  test: {
    environment: "happy-dom",
  },
});
