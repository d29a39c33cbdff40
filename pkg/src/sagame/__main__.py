from sagame.cli import main

main()
