/** Browser entry point: mount the console and point it at the service.
 *
 * When the static assets are served by a different host than the query
 * service, set the service origin before this script loads:
 *   <script>window.QUERYFLOW_SERVICE_URL = "http://127.0.0.1:8000";</script>
 */

import { createApp } from "./app.js";

declare global {
  interface Window {
    QUERYFLOW_SERVICE_URL?: string;
  }
}

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app mount point");
createApp(root, { serviceUrl: window.QUERYFLOW_SERVICE_URL ?? "" });
