import { MonitoringApp } from "./app.js";

const app = new MonitoringApp(window, "");
void app.init();
