import { defineConfig } from 'vite';

// the query service runs separately (ccss serve); proxy /api in dev
export default defineConfig({
  server: {
    proxy: {
      '/api': 'http://127.0.0.1:8100',
    },
  },
});
