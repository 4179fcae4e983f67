function processInput(data) {
  eval(data);
}

function run(cb, userInput) {
  var callbacks = [];
  callbacks.push(cb);
  callbacks[0](userInput);
}

var userInput = location.hash;
run(processInput, userInput);
